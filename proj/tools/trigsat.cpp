#include "trigsat/cli.hpp"

int main(int argc, char** argv) { return trigsat::run_cli(argc, argv); }
