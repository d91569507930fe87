#include "cqq/cli.hpp"

int main(int argc, char** argv) { return cqq::cli_main(argc, argv); }
