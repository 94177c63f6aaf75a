#include "spectralflow/run.hpp"

int main(int argc, char** argv) { return spectralflow::run_cli(argc, argv); }
