#include "lom/cli.hpp"

int main(int argc, char** argv) { return lom::cli_main(argc, argv); }
