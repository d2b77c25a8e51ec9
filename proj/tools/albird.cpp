#include "albird/cli.hpp"

int main(int argc, char** argv) { return albird::run_cli(argc, argv); }
