#include "cli/app.hpp"

int main(int argc, char** argv) { return ceqcli::run_cli(argc, argv); }
