#include "trajpred/cli/app.hpp"

int main(int argc, char** argv) { return trajpred::cli::run(argc, argv); }
