#include "scidnet/cli.hpp"

int main(int argc, char** argv) { return scidnet::run_cli(argc, argv); }
