#include "hqt/cli.hpp"

int main(int argc, char** argv) { return hqt::cli::run_cli(argc, argv); }
