#include "stancelab/cli.hpp"

int main(int argc, char** argv) { return stancelab::cli::parse_and_dispatch(argc, argv); }
