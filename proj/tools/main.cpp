#include "hpm/cli.hpp"

int main(int argc, char** argv) { return hpm::cli::run(argc, argv); }
