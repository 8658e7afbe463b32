#include "stoc/experiments.hpp"

int main(int argc, char** argv) { return stoc::experiments::run_cli(argc, argv); }
