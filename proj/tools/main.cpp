#include <string>
#include <vector>

#include "scmppi/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return scmppi::run_cli(args);
}
