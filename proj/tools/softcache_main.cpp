#include "softcache/cli.hpp"

int main(int argc, char** argv) { return softcache::run_cli(argc, argv); }
