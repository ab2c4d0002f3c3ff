#include <stdio.h>

int classify(int value) {
    if (value < 0)
        return -1;
    if (value == 0)
        return 0;
    if (value > 100)
        return 2;
    return 1;
}

int main(void) {
    int total = 0;
    total += classify(-5);
    total += classify(0);
    total += classify(12);
    total += classify(500);
    printf("%d\n", total);
    return 0;
}
