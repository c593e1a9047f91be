#include "mfsync/harness/cli.hpp"

int main(int argc, char** argv) { return mfsync::harness::run_cli(argc, argv); }
