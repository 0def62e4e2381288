#include "bmf/commands.hpp"

int main(int argc, char** argv) { return bmf::run_cli(argc, argv); }
