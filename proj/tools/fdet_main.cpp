#include "fdet/cli.hpp"

int main(int argc, char** argv) {
    return fdet::cli::run(argc, argv);
}
