#include "tifl/cli.hpp"

int main(int argc, char** argv) { return tifl::run_cli(argc, argv); }
