#include "vgf/cli.hpp"

int main(int argc, char** argv) { return vgf::run_cli(argc, argv); }
