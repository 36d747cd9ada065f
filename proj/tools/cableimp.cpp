#include <cableimp/cli.hpp>

int main(int argc, char** argv) { return cableimp::run(std::vector<std::string>(argv + 1, argv + argc)); }
