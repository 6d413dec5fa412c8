#include "cli.hpp"

int main(int argc, char** argv) { return holab::run_cli(argc, argv); }
