public class Noop {
    static void noop() {
    }

    public static void main(String[] args) {
        long markers = args.length > 0 ? Long.parseLong(args[0]) : 0;
        for (long i = 0; i < markers / 2; i++)
            noop();
    }
}
