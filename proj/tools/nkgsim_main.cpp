#include "nkg/cli.hpp"

int main(int argc, char** argv) { return nkg::run_cli(argc, argv); }
