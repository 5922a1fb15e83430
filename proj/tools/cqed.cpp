#include "cqed/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return cqed::cli::run_main(argc, argv, std::cout, std::cerr);
}
