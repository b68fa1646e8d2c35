#include "cli.hpp"

int main(int argc, char **argv) { return qnopt::cli::dispatch(argc, argv); }
