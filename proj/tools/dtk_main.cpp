#include "cli.hpp"

int main(int argc, char** argv) { return dtk::cli::run(argc, argv); }
