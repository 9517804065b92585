#include "spcp/cli.hpp"

int main(int argc, char** argv) { return spcp::run_cli(argc, argv); }
