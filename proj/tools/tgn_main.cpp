#include "tgn/harness.hpp"

int main(int argc, char** argv) { return tgn::cli_main(argc, argv); }
