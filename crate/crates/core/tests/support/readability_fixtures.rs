//! Documents with hand-counted surface statistics and frozen readability scores.

// (text, words, sentences, syllables, reading ease, grade level), with the
// two scores evaluated from the formulas by hand and frozen here.
pub const FIXTURES: [(&str, usize, usize, usize, f64, f64); 20] = [
    ("Paper garden banana hat sun garden paper tomato banana. Dog paper fish sun. Garden animal tomato. Banana happy.", 18, 4, 37, 28.367500000000035, 10.420555555555556),
    ("Banana cat garden dog. Cat hat. Banana cat paper top paper. Garden hat tomato fish paper.", 16, 4, 27, 60.01250000000002, 5.8825),
    ("Paper tomato fish.", 3, 1, 6, 34.59000000000003, 9.180000000000003),
    ("Animal fish top. Garden fish cat dog banana. Happy dog fish. Dog cat tomato cat hat hat cat paper.", 19, 4, 28, 77.34006578947371, 3.651973684210528),
    ("Happy dog banana tomato hat tomato fish top. Fish top cat. Dog sun hat animal dog cat cat paper. Sun tomato garden hat paper garden hat animal sun.", 28, 4, 45, 63.765714285714324, 6.104285714285716),
    ("Dog happy happy hat cat fish banana fish. Hat sun. Banana tomato banana dog cat sun hat paper. Cat banana top fish happy dog.", 24, 4, 38, 66.79500000000002, 5.433333333333334),
    ("Hat banana tomato.", 3, 1, 7, 6.390000000000043, 13.113333333333333),
    ("Banana top. Banana paper sun banana paper banana sun.", 9, 2, 19, 23.667500000000018, 11.07611111111111),
    ("Tomato sun fish hat. Animal hat sun animal tomato. Tomato happy paper banana dog. Cat dog dog cat garden fish hat animal.", 22, 4, 39, 51.27977272727273, 7.473181818181821),
    ("Happy banana paper fish garden sun. Sun hat paper. Fish hat hat. Dog fish.", 14, 4, 20, 82.42535714285714, 2.6321428571428562),
    ("Hat cat cat sun fish top garden banana sun. Top sun paper. Tomato animal animal garden banana sun banana. Cat paper.", 21, 4, 37, 52.44910714285717, 7.247976190476191),
    ("Cat cat banana tomato dog paper. Animal fish top. Dog dog paper garden.", 13, 3, 22, 59.26743589743592, 6.069230769230771),
    ("Animal animal. Top top dog tomato. Dog happy cat paper banana cat banana tomato happy.", 15, 3, 30, 32.56000000000003, 9.96),
    ("Banana dog. Dog tomato dog. Happy animal top happy animal animal. Paper paper garden dog garden garden cat fish banana.", 20, 4, 39, 36.79000000000005, 9.370000000000001),
    ("Cat hat animal dog paper banana tomato paper fish.", 9, 1, 17, 37.900000000000034, 10.208888888888893),
    ("Fish sun tomato banana hat garden sun.", 7, 1, 12, 54.70142857142861, 7.368571428571432),
    ("Paper hat top happy tomato fish hat tomato happy. Hat happy hat banana top. Sun sun paper top cat.", 19, 3, 30, 66.82771929824563, 5.51157894736842),
    ("Sun dog paper paper fish hat.", 6, 1, 8, 87.94500000000001, 2.4833333333333343),
    ("Tomato garden paper tomato top animal banana paper. Dog cat fish banana cat tomato animal. Banana top fish tomato banana cat. Happy paper hat cat.", 25, 4, 50, 31.29125000000002, 10.447500000000002),
    ("Sun cat tomato dog paper. Tomato garden tomato. Dog tomato hat hat paper fish sun.", 15, 3, 26, 55.12000000000003, 6.813333333333333),
];
