#include "sras/cli.hpp"

int main(int argc, char** argv) { return sras::cli::run_command(argc, argv); }
