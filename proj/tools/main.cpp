#include "dppsgd/experiments.hpp"

int main(int argc, char** argv) { return dppsgd::cli_main(argc, argv); }
