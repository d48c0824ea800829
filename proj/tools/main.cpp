#include "suffmdp/cli.hpp"

int main(int argc, char** argv) { return suffmdp::run_cli(argc, argv); }
