#include <string>
#include <vector>

#include "lrm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lrm::cli::run(args);
}
