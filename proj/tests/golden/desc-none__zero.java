File file = new File(path);
BufferedReader br = new BufferedReader(new FileReader(file));
String line = br.readLine().trim();
// the fully qualified name of "br" is