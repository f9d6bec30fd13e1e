#include "dnr/cli.hpp"

int main(int argc, char** argv) { return dnr::cli::run(argc, argv); }
