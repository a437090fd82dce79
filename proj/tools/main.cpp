#include "csched/cli.hpp"

int main(int argc, char** argv) { return csched::run_cli(argc, argv); }
