#include "prep/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return prep::cli::run_cli(std::move(args));
}
