#include "pqlm/cli.hpp"

int main(int argc, char** argv) { return pqlm::cli::run(argc, argv); }
