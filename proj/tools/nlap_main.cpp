#include "nlap/commands.hpp"

int main(int argc, char** argv) { return nlap::run_cli(argc, argv); }
