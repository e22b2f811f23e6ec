#include <abundancy/cli.hpp>

int main(int argc, char** argv) { return abundancy::cli::run(argc, argv); }
