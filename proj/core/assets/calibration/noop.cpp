#include <cstdlib>

void noop() {
}

int main(int argc, char **argv) {
    long markers = argc > 1 ? std::strtol(argv[1], nullptr, 10) : 0;
    for (long i = 0; i < markers / 2; i++)
        noop();
    return 0;
}
