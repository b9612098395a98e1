#include "cli/app.h"

int main(int argc, char** argv) { return treeint::cli::main_entry(argc, argv); }
