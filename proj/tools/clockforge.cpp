#include "clockforge/cli.hpp"

int main(int argc, char** argv) { return clockforge::cli::run(argc, argv); }
