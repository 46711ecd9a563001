#include "aesth/cli/app.hpp"

int main(int argc, char** argv) { return aesth::cli::run_cli(argc, argv); }
