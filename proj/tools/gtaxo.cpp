#include <string>
#include <vector>

#include "gtaxo/alloc.hpp"
#include "gtaxo/cli.hpp"

int main(int argc, char** argv) {
    gtaxo::tune_allocator();
    std::vector<std::string> args(argv + 1, argv + argc);
    return gtaxo::cli::dispatch(args);
}
