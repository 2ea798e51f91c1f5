#include "gafvit/cli.hpp"

int main(int argc, char** argv) { return gafvit::cli::dispatch(argc, argv); }
