#include "cli.hpp"

int main(int argc, char** argv) { return prcut::cli_main(argc, argv); }
