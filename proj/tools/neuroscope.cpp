#include "neuroscope/cli.hpp"

int main(int argc, char** argv) { return neuroscope::cli::run(argc, argv); }
