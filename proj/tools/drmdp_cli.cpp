#include "drmdp/cli.hpp"

int main(int argc, char** argv) { return drmdp::run_cli(argc, argv); }
