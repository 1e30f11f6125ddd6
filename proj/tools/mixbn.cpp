#include "mixbn/cli.hpp"

int main(int argc, char** argv) { return mixbn::run_cli(argc, argv); }
