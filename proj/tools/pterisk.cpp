#include "pterisk/cli.hpp"

int main(int argc, char** argv) { return pterisk::cli::run(argc, argv); }
