#include "shellvi/experiments.hpp"

int main(int argc, char** argv) { return shellvi::cli_main(argc, argv); }
