#include "splinetool/cli/commands.hpp"

int main(int argc, char** argv) { return splinetool::cli::run_cli(argc, argv); }
