#include "edci_cli.hpp"

int main(int argc, char** argv) { return edci::cli::run(argc, argv); }
