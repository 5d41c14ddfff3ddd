#include "propinf/cli.hpp"

int main(int argc, char** argv) { return propinf::run_cli(argc, argv); }
