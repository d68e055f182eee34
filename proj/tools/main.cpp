#include "bpvei/cli.hpp"

int main(int argc, char** argv) { return bpvei::cli::dispatch(argc, argv); }
