#include "ripple/cli.hpp"

int main(int argc, char** argv) { return ripple::cli::dispatch(argc, argv); }
