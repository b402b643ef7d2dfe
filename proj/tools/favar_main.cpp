#include "cli.hpp"

int main(int argc, char** argv) { return favar::cli::run(argc, argv); }
