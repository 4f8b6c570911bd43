#include "qmetro/cli.hpp"

int main(int argc, char** argv) { return qmetro::run_cli(argc, argv); }
