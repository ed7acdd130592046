#include "latsteer/cli.hpp"

int main(int argc, char** argv) { return latsteer::parse_and_run(argc, argv); }
