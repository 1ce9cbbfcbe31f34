#include "docmt/cli.hpp"

int main(int argc, char** argv) { return docmt::run_cli(argc, argv); }
