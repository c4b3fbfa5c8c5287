#include "slidesync/cli.hpp"

int main(int argc, char** argv) { return slidesync::cli::run(argc, argv); }
