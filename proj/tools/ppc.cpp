#include "ppc/cli.hpp"

int main(int argc, char** argv) { return ppc::cli::run(argc, argv); }
