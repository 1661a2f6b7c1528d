// nonmark_main.cpp - command line entry point

#include "nonmark/cli.hpp"

int main(int argc, char** argv) { return nonmark::cli::main_entry(argc, argv); }
