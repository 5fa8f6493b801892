#include "cli.hpp"

int main(int argc, char** argv) { return phasewalk::cli::run(argc, argv); }
