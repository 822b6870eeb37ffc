File file = new File(path);
BufferedReader br = new BufferedReader(new FileReader(file));
String line = br.readLine().trim();
// type inference
// the fully qualified name of "Object" is "java.lang.Object"
// the fully qualified name of "br" is