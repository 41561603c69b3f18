#include "cli.hpp"

int main(int argc, char** argv) { return brf::cli::run(argc, argv); }
