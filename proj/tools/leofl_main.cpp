#include <string>
#include <vector>

#include "leofl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return leofl::cli::run_command(args);
}
