#include "hamexp/cli.hpp"

int main(int argc, char** argv) { return hamexp::cli::run(argc, argv); }
