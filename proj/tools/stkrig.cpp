#include "stkrig/cli.hpp"

int main(int argc, char** argv) { return stkrig::run_cli(argc, argv); }
