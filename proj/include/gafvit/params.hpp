#pragma once

#include "gafvit/autograd.hpp"

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

namespace gafvit {

using autograd::Parameter;

// Named parameters in insertion order, each with a gradient slot of the same
// shape. References returned by add()/at() stay valid for the store's lifetime.
class ParamStore {
public:
    ParamStore() = default;
    ParamStore(const ParamStore& other);
    ParamStore& operator=(const ParamStore& other);
    ParamStore(ParamStore&&) noexcept = default;
    ParamStore& operator=(ParamStore&&) noexcept = default;

    Parameter& add(std::string name, std::size_t rows, std::size_t cols);
    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;
    bool contains(std::string_view name) const;

    std::deque<Parameter>& all() noexcept { return m_params; }
    const std::deque<Parameter>& all() const noexcept { return m_params; }

    void zero_grad();
    std::size_t total_size() const;
    // Copies values (not gradients) from a store with identical layout.
    void copy_values_from(const ParamStore& other);

    std::uint64_t seed = 0;
    std::uint64_t step = 0;

private:
    void reindex();

    std::deque<Parameter> m_params;
    std::unordered_map<std::string, std::size_t> m_index;
};

void init_normal(Parameter& p, std::mt19937_64& rng, double stddev);
void init_constant(Parameter& p, double value);

} // namespace gafvit
