#include <string>
#include <vector>

#include "gava/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gava::cli::run_command(args);
}
