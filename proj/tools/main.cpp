#include "latentedit/cli.hpp"

int main(int argc, char** argv) { return latentedit::cli_main(argc, argv); }
