#include "gafvit/params.hpp"

#include "gafvit/error.hpp"

namespace gafvit {

ParamStore::ParamStore(const ParamStore& other) : seed(other.seed), step(other.step), m_params(other.m_params) {
    reindex();
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
    if (this != &other) {
        m_params = other.m_params;
        seed = other.seed;
        step = other.step;
        reindex();
    }
    return *this;
}

void ParamStore::reindex() {
    m_index.clear();
    for (std::size_t i = 0; i < m_params.size(); ++i) m_index.emplace(m_params[i].name, i);
}

Parameter& ParamStore::add(std::string name, std::size_t rows, std::size_t cols) {
    if (m_index.contains(name)) raise(Errc::InvalidArgument, "duplicate parameter " + name);
    m_index.emplace(name, m_params.size());
    m_params.push_back(Parameter{std::move(name), Matrix(rows, cols), Matrix(rows, cols), false});
    return m_params.back();
}

Parameter& ParamStore::at(std::string_view name) {
    auto it = m_index.find(std::string(name));
    if (it == m_index.end()) raise(Errc::InvalidArgument, "no parameter " + std::string(name));
    return m_params[it->second];
}

const Parameter& ParamStore::at(std::string_view name) const {
    auto it = m_index.find(std::string(name));
    if (it == m_index.end()) raise(Errc::InvalidArgument, "no parameter " + std::string(name));
    return m_params[it->second];
}

bool ParamStore::contains(std::string_view name) const { return m_index.contains(std::string(name)); }

void ParamStore::zero_grad() {
    for (auto& p : m_params) {
        if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows, p.value.cols);
        p.grad.fill(0.0);
    }
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& p : m_params) n += p.value.size();
    return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
    if (other.m_params.size() != m_params.size()) raise(Errc::ShapeMismatch, "parameter stores differ in layout");
    for (std::size_t i = 0; i < m_params.size(); ++i) {
        if (other.m_params[i].name != m_params[i].name || !other.m_params[i].value.same_shape(m_params[i].value))
            raise(Errc::ShapeMismatch, "parameter stores differ at " + m_params[i].name);
        m_params[i].value = other.m_params[i].value;
    }
}

void init_normal(Parameter& p, std::mt19937_64& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : p.value.data) v = dist(rng);
}

void init_constant(Parameter& p, double value) { p.value.fill(value); }

} // namespace gafvit
