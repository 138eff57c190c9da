#include "codedblur/cli.hpp"

int main(int argc, char** argv) { return codedblur::cli::run(argc, argv); }
