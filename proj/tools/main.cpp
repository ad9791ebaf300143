#include "commands.hpp"

int main(int argc, char** argv) { return stsexo::tools::RunCli(argc, argv); }
