#include "stagebench/cli/app.hpp"

int main(int argc, char **argv) { return stagebench::cli::run(argc, argv); }
