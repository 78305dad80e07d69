#include "qem/cli.hpp"

int main(int argc, char** argv) { return qem::cli::main_impl(argc, argv); }
