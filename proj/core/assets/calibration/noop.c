#include <stdlib.h>

void noop(void) {
}

int main(int argc, char **argv) {
    long markers = argc > 1 ? strtol(argv[1], 0, 10) : 0;
    for (long i = 0; i < markers / 2; i++)
        noop();
    return 0;
}
