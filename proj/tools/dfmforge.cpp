#include <iostream>

#include "dfmforge/service/cli.hpp"

int main(int argc, char** argv) { return dfmforge::service::run_cli(argc, argv, std::cout, std::cerr); }
